import java.util.Random;

public class Seeded {
    public int replay(long seed) {
        Random fresh = new Random(seed); // expect: S2119
        return fresh.nextInt();
    }
}
