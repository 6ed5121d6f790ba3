package toy.bank;

/**
 * A bank account holding a balance for a single owner.
 */
public class Account {
    /** Lowest balance a withdrawal may leave behind. */
    public static final double MIN_BALANCE = 0.0;

    private final String owner;
    private double balance;
    private boolean frozen;

    /** Creates an empty account for the given owner. */
    public Account(String owner) {
        this(owner, 0.0);
    }

    /** Creates an account with an opening balance. */
    public Account(String owner, double openingBalance) {
        this.owner = owner;
        this.balance = openingBalance;
        this.frozen = false;
    }

    public String getOwner() {
        return owner;
    }

    public double getBalance() {
        return balance;
    }

    public boolean isFrozen() {
        return frozen;
    }

    /** Freezes the account; later balance updates are rejected. */
    public void freeze() {
        frozen = true;
    }

    // Rejects modifications of a frozen account.
    private void validateAccount() {
        if (frozen) {
            throw new IllegalStateException("account is frozen: " + owner);
        }
    }

    /**
     * Adds delta to the balance.
     * @throws IllegalStateException if the account is frozen
     */
    public void updateBalance(double delta) {
        validateAccount();
        this.balance = this.balance + delta;
    }

    /** Withdraws amount; returns false when funds are insufficient. */
    public boolean withdraw(double amount) {
        if (amount <= 0) {
            throw new IllegalArgumentException("amount must be positive");
        }
        if (balance - amount < MIN_BALANCE) {
            return false;
        }
        updateBalance(-amount);
        return true;
    }

    /** Deposits a positive amount. */
    public void deposit(double amount) {
        if (amount <= 0) {
            throw new IllegalArgumentException("amount must be positive");
        }
        updateBalance(amount);
    }
}
