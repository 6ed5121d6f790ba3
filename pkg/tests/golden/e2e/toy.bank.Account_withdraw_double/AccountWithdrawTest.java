package toy.bank;

import static org.junit.jupiter.api.Assertions.assertEquals;
import static org.junit.jupiter.api.Assertions.assertFalse;
import static org.junit.jupiter.api.Assertions.assertThrows;
import static org.junit.jupiter.api.Assertions.assertTrue;

import org.junit.jupiter.api.AfterEach;
import org.junit.jupiter.api.BeforeEach;
import org.junit.jupiter.api.Test;

class AccountWithdrawTest {
    private static final double EPS = 1e-9;
    private Account account;

    @BeforeEach
    void setUp() {
        account = new Account("alice", 100.0);
    }

    @AfterEach
    void tearDown() {
        account = null;
    }

    private void assertBalance(double expected) {
        assertEquals(expected, account.getBalance(), EPS);
    }

    @Test
    void withdrawFollowsBalanceCheck() {
        assertTrue(account.withdraw(40.0));
        assertBalance(60.0);
        assertFalse(account.withdraw(150.0));
        assertBalance(60.0);
    }

    @Test
    void withdrawRemovesExactAmounts() {
        assertTrue(account.withdraw(0.01));
        assertBalance(99.99);
        assertTrue(account.withdraw(99.99));
        assertBalance(0.0);
    }

    @Test
    void withdrawRejectsNonPositiveAmounts() {
        assertThrows(IllegalArgumentException.class, () -> account.withdraw(0.0));
        assertThrows(IllegalArgumentException.class, () -> account.withdraw(-5.0));
        assertBalance(100.0);
    }

    @Test
    void withdrawFromFrozenAccountFails() {
        account.freeze();
        assertThrows(IllegalStateException.class, () -> account.withdraw(10.0));
    }
}
