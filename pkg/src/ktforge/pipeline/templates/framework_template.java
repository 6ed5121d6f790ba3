package ${package};

import org.junit.jupiter.api.AfterEach;
import org.junit.jupiter.api.BeforeEach;

class ${test_class} {
    // fields: the instance under test and its collaborators

    @BeforeEach
    void setUp() {
        // create the instance under test and prepare shared inputs
    }

    @AfterEach
    void tearDown() {
        // release resources acquired in setUp
    }
}
