#pragma once

#include "sobo/bot.hpp"
#include "sobo/config.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace sobo {

// Fixed-size thread pool. Destruction drains the queue: every submitted task
// runs before the workers join, so a stopping daemon finishes the ticks it
// already scheduled.
class WorkerPool {
public:
    explicit WorkerPool(size_t n) {
        if (n == 0) n = 1;
        for (size_t i = 0; i < n; ++i)
            workers_.emplace_back([this] { work(); });
    }

    ~WorkerPool() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (std::thread& t : workers_) t.join();
    }

    void submit(std::function<void()> task) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (stopping_) return;
            queue_.push_back(std::move(task));
        }
        cv_.notify_one();
    }

    // blocks until the queue is empty and no task is running
    void drain() {
        std::unique_lock<std::mutex> lock(mu_);
        idle_cv_.wait(lock, [this] { return queue_.empty() && running_ == 0; });
    }

private:
    std::vector<std::thread> workers_;
    std::deque<std::function<void()>> queue_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    size_t running_ = 0;
    bool stopping_ = false;

    void work() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock<std::mutex> lock(mu_);
                cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                if (queue_.empty()) return; // stopping and drained
                task = std::move(queue_.front());
                queue_.pop_front();
                ++running_;
            }
            task();
            {
                std::lock_guard<std::mutex> lock(mu_);
                --running_;
            }
            idle_cv_.notify_all();
        }
    }
};

// Polling loop: every interval, reload the repository list if it changed on
// disk, then schedule a tick per repo on the pool. A repo whose previous tick
// is still running is skipped this round, never queued twice.
class Runner {
public:
    Runner(Bot& bot, std::filesystem::path repos_file, std::chrono::duration<double> interval,
           size_t workers = 4)
        : bot_(bot), repos_file_(std::move(repos_file)), interval_(interval), pool_(workers) {}

    // One scheduling sweep. Non-blocking: ticks run on the pool.
    void pass() {
        reload_if_changed();
        std::vector<RepoRef> repos;
        {
            std::lock_guard<std::mutex> lock(mu_);
            repos = repos_;
        }
        for (const RepoRef& repo : repos) {
            auto flag = in_flight(repo);
            if (flag->exchange(true)) continue;
            pool_.submit([this, repo, flag] {
                bot_.tick(repo);
                flag->store(false);
            });
        }
    }

    // Runs until stop() returns true; checks it every 50ms so shutdown is
    // prompt even with long intervals. In-flight ticks finish before return.
    void run(const std::function<bool()>& stop) {
        using namespace std::chrono;
        while (!stop()) {
            pass();
            auto deadline = steady_clock::now() + duration_cast<steady_clock::duration>(interval_);
            while (!stop() && steady_clock::now() < deadline)
                std::this_thread::sleep_for(milliseconds(50));
        }
        pool_.drain();
    }

    void run_for(std::chrono::duration<double> total) {
        using namespace std::chrono;
        auto deadline = steady_clock::now() + duration_cast<steady_clock::duration>(total);
        run([deadline] { return steady_clock::now() >= deadline; });
    }

    // Synchronous sweep for tests: tick every repo on this thread, in order.
    void pass_blocking() {
        reload_if_changed();
        std::vector<RepoRef> repos;
        {
            std::lock_guard<std::mutex> lock(mu_);
            repos = repos_;
        }
        for (const RepoRef& repo : repos) bot_.tick(repo);
    }

    std::vector<RepoRef> repos() {
        reload_if_changed();
        std::lock_guard<std::mutex> lock(mu_);
        return repos_;
    }

private:
    Bot& bot_;
    std::filesystem::path repos_file_;
    std::chrono::duration<double> interval_;
    WorkerPool pool_;
    std::mutex mu_;
    std::vector<RepoRef> repos_;
    std::map<std::string, std::shared_ptr<std::atomic<bool>>> flags_;
    std::optional<std::filesystem::file_time_type> loaded_mtime_;

    std::shared_ptr<std::atomic<bool>> in_flight(const RepoRef& repo) {
        std::lock_guard<std::mutex> lock(mu_);
        auto& slot = flags_[repo.key()];
        if (!slot) slot = std::make_shared<std::atomic<bool>>(false);
        return slot;
    }

    void reload_if_changed() {
        std::error_code ec;
        auto mtime = std::filesystem::last_write_time(repos_file_, ec);
        if (ec) {
            if (loaded_mtime_) {
                log_warn("repository list " + repos_file_.string() + " unreadable, keeping " +
                         std::to_string(repos_.size()) + " repos");
                loaded_mtime_.reset();
            }
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (loaded_mtime_ && *loaded_mtime_ == mtime) return;
        }
        RepoListResult parsed = parse_repo_list(repos_file_);
        for (const std::string& err : parsed.errors) log_warn(err);
        std::lock_guard<std::mutex> lock(mu_);
        repos_ = std::move(parsed.repos);
        loaded_mtime_ = mtime;
        log_info("monitoring " + std::to_string(repos_.size()) + " repositories from " +
                 repos_file_.string());
    }
};

} // namespace sobo
