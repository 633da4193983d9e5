package org.example.inventory;

import java.time.Instant;
import java.util.ArrayList;
import java.util.List;

/**
 * Append-only record of stock changes. Fixes #1.
 */
public class AuditLog {

    private final List<String> entries = new ArrayList<>();

    public void record(String sku, int delta) {
        // FIXME: the timestamp is truncated to seconds until #11 is resolved
        entries.add(Instant.now().getEpochSecond() + " " + sku + " " + delta);
    }

    public List<String> entries() {
        return List.copyOf(entries);
    }
}
