public class NonFinalField {
    private int capacity = 32; // expect: S109
    private double ratio = 0.75; // expect: S109
    private int count = 0;

    public int room() {
        return capacity - count;
    }

    public double ratio() {
        return ratio;
    }
}
