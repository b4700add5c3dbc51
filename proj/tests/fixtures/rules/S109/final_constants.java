public class FinalConstants {
    private static final int MAX_RETRIES = 42;
    private static final double GOLDEN = 1.618;
    private static final long TIMEOUT_MS = 30_000L;

    public int budget() {
        final int slack = 17;
        return MAX_RETRIES + slack;
    }

    public double stretch(double base) {
        return base * GOLDEN + TIMEOUT_MS;
    }
}
