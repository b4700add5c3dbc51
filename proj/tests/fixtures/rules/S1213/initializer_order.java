public class InitializerOrder {
    static {
        register();
    }

    private static int handles; // expect: S1213

    {
        handles = 1;
    }

    private int local; // expect: S1213

    public int local() {
        return local;
    }

    static void register() {
        handles = 0;
    }
}
