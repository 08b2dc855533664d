public class Good {

    public int twice(int value) {
        return value * 2;
    }
}
