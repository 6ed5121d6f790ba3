package toy.bank;

import java.util.HashMap;
import java.util.Map;
import java.util.logging.Logger;

/** Registry of accounts keyed by owner name. */
public class Bank {
    private static final Logger LOG = Logger.getLogger("bank");

    private final Map<String, Account> accounts = new HashMap<>();
    private final boolean verbose;

    public Bank(boolean verbose) {
        this.verbose = verbose;
    }

    /** Opens an account, or returns the existing one for the owner. */
    public Account openAccount(String owner, double initial) {
        Account existing = findAccount(owner);
        if (existing != null) {
            return existing;
        }
        Account account = new Account(owner, initial);
        accounts.put(owner, account);
        return account;
    }

    /** Returns null if no account is found for the owner. */
    public Account findAccount(String owner) {
        return accounts.get(owner);
    }

    /** Moves amount between two accounts; returns false if the withdrawal fails. */
    public boolean transfer(String from, String to, double amount) {
        Account source = findAccount(from);
        Account target = findAccount(to);
        if (verbose) {
            LOG.info("transfer " + amount);
        }
        if (source == null || target == null) {
            throw new IllegalArgumentException("unknown account");
        }
        if (!source.withdraw(amount)) {
            return false;
        }
        target.deposit(amount);
        return true;
    }

    /** Total balance across all accounts. */
    public double totalBalance() {
        double total = 0.0;
        for (Account account : accounts.values()) {
            total += account.getBalance();
        }
        return total;
    }

    /** Opens a joint account funded from an existing one. */
    public Account openJoint(String owner, String partner, double share) {
        Account joint = openAccount(owner + "&" + partner, 0.0);
        transfer(owner, joint.getOwner(), share);
        return joint;
    }
}
