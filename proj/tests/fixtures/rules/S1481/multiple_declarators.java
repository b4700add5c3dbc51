public class MultipleDeclarators {
    public int pick(int[] xs) {
        int first = xs[0], spare = 0; // expect: S1481
        return first;
    }
}
