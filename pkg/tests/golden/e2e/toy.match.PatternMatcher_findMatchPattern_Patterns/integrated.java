package toy.match;

import static org.junit.jupiter.api.Assertions.assertEquals;
import static org.junit.jupiter.api.Assertions.assertThrows;

import org.junit.jupiter.api.AfterEach;
import org.junit.jupiter.api.BeforeEach;
import org.junit.jupiter.api.Test;

class PatternMatcherFindMatchPatternTest {
    private PatternMatcher matcher;

    @BeforeEach
    void setUp() {
        matcher = new PatternMatcher("abcabd");
    }

    @AfterEach
    void tearDown() {
        matcher = null;
    }

    @Test
    void valueAndPlainPatternsTakeDifferentPaths() {
        assertEquals(4, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("abd")));
        assertEquals(2, matcher.findMatchPattern(() -> "ca"));
        assertEquals(-1, matcher.getLastMatch());
    }

    @Test
    void wildcardMatchesAnyCharacter() {
        assertEquals(3, Parser.parse("a?d", true).length);
        assertEquals(3, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("a?d")));
        assertEquals(-1, matcher.findMatchPattern(new PatternMatcher.ValuePatterns("zz")));
    }

    @Test
    void nullPatternIsRejected() {
        assertThrows(NullPointerException.class, () -> matcher.findMatchPattern(null));
    }
}
