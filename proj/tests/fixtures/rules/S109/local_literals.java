public class LocalLiterals {
    public int compute(int base) {
        int a = 42; // expect: S109
        int mask = 0xFF & base; // expect: S109
        int shifted = base << 3; // expect: S109
        long big = 1_000_000L; // expect: S109
        return a + mask + shifted + (int) big;
    }
}
