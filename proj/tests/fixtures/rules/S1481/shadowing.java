public class Shadowing {
    public int outerUsedInnerNot(int base) {
        int value = base;
        int keep = value;
        {
            int value = keep; // expect: S1481
        }
        return keep;
    }
}
