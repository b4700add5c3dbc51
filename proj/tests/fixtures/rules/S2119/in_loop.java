import java.util.Random;

public class InLoop {
    public int jitterSum(int[] xs) {
        int total = 0;
        for (int i = 0; i < xs.length; i++) {
            total += new Random().nextInt(); // expect: S2119
        }
        return total;
    }
}
