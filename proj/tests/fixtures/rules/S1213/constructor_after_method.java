public class ConstructorAfterMethod {
    private final String name;

    public String name() {
        return name;
    }

    public ConstructorAfterMethod(String name) { // expect: S1213
        this.name = name;
    }
}
