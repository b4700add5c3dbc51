public class LoopCounter {
    public int count(int[] xs) {
        int seen = 0;
        for (int i = 0; i < xs.length; i++) {
            seen += 1;
        }
        for (int x : xs) {
            seen += x;
        }
        return seen;
    }
}
