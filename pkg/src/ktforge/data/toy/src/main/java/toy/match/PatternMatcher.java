package toy.match;

import toy.text.Parser;
import toy.text.Parser.InputCharactor;

/** Matches textual patterns against a fixed subject string. */
public class PatternMatcher {

    /** A pattern that can render itself as text. */
    public interface Patterns {
        String text();
    }

    /** A literal pattern matched character by character. */
    public static class ValuePatterns implements Patterns {
        private final String value;

        public ValuePatterns(String value) {
            this.value = value;
        }

        public String text() {
            return value;
        }
    }

    private final String subject;
    private int lastMatch;

    public PatternMatcher(String subject) {
        this.subject = subject;
        this.lastMatch = -1;
    }

    /** Returns the index of the first match of pattern, or -1 when there is none. */
    public int findMatchPattern(Patterns pattern) {
        int result = -1;
        if (pattern instanceof ValuePatterns) {
            InputCharactor[] chars = Parser.parse(pattern.text());
            return findMatchPattern(chars, (ValuePatterns) pattern);
        } else {
            lastMatch = -1;
            result = subject.indexOf(pattern.text());
        }
        return result;
    }

    private int findMatchPattern(InputCharactor[] chars, ValuePatterns pattern) {
        for (int start = 0; start + chars.length <= subject.length(); start++) {
            int i = 0;
            while (i < chars.length && chars[i].matches(subject.charAt(start + i))) {
                i++;
            }
            if (i == chars.length) {
                lastMatch = start;
                return start;
            }
        }
        lastMatch = -1;
        return -1;
    }

    public int getLastMatch() {
        return lastMatch;
    }
}
