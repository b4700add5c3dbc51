import java.util.Set;

public class Mirrored {
    public boolean vacant(Set<Long> ids) {
        boolean a = 0 == ids.size(); // expect: S1155
        boolean b = 0 != ids.size(); // expect: S1155
        boolean c = 1 > ids.size(); // expect: S1155
        return a || b || c;
    }
}
