import java.util.Random;

public class InMethod {
    public int roll() {
        Random random = new Random(); // expect: S2119
        return random.nextInt();
    }
}
