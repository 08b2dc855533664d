public class Bad {

    public void incomplete() {
        int value = 1;
        if (value > 0) {
            System.out.println("missing closing brace below");
    }
}
