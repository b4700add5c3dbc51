public class AllowedValues {
    public int find(int[] xs, int wanted) {
        for (int i = 0; i < xs.length; i++) {
            if (xs[i] == wanted) {
                return i;
            }
        }
        return -1;
    }

    public int sign(int x) {
        if (x > 0) {
            return 1;
        }
        return x == 0 ? 0 : -1;
    }
}
