package toy.text;

/** Splits pattern text into matchable characters. */
public class Parser {

    /** One pattern character; '?' matches anything. */
    public static class InputCharactor {
        private final char value;

        public InputCharactor(char value) {
            this.value = value;
        }

        public boolean matches(char c) {
            return value == '?' || value == c;
        }
    }

    /** Parses text into characters; an empty text yields an empty array. */
    public static InputCharactor[] parse(String text) {
        InputCharactor[] out = new InputCharactor[text.length()];
        for (int i = 0; i < text.length(); i++) {
            out[i] = new InputCharactor(text.charAt(i));
        }
        return out;
    }
}
