package org.example.inventory;

import java.util.Map;
import java.util.Optional;
import java.util.concurrent.ConcurrentHashMap;

public class StockRepository {

    private final Map<String, Integer> levels = new ConcurrentHashMap<>();

    /*
     * FIXME: we copy the map on every read.
     * Go back to the live view after #8 is resolved.
     */
    public Map<String, Integer> snapshot() {
        return Map.copyOf(levels);
    }

    public Optional<Integer> find(String sku) {
        return Optional.ofNullable(levels.get(sku));
    }

    public void put(String sku, int level) {
        if (level < 0) {
            throw new IllegalArgumentException("negative stock for " + sku);
        }
        levels.put(sku, level);
    }
}
