package toy.config;

import java.util.HashMap;
import java.util.Map;

/** Parses key=value configuration lines. */
public class Parser {

    /** How malformed lines are treated. */
    public enum Mode { STRICT, LENIENT }

    private final Mode mode;
    private final Map<String, String> values = new HashMap<>();

    public Parser(Mode mode) {
        this.mode = mode;
    }

    /** Parses one line; blank lines and comments are ignored. */
    public boolean parseLine(String line) {
        String trimmed = line.trim();
        if (trimmed.isEmpty() || trimmed.startsWith("#")) {
            return false;
        }
        int eq = trimmed.indexOf('=');
        if (eq < 0) {
            if (mode == Mode.STRICT) {
                throw new IllegalArgumentException("missing '=' in: " + line);
            }
            return false;
        }
        values.put(trimmed.substring(0, eq).trim(), trimmed.substring(eq + 1).trim());
        return true;
    }

    public String get(String key) {
        return values.get(key);
    }
}
