package org.example.inventory;

import java.util.HashMap;
import java.util.Map;
import java.util.Optional;

/**
 * Keeps track of stock levels per SKU.
 */
public class InventoryService {

    private final StockRepository repository;
    private final Map<String, Integer> reserved = new HashMap<>();

    public InventoryService(StockRepository repository) {
        this.repository = repository;
    }

    public Optional<Integer> available(String sku) {
        // See #2 for why reservations are subtracted here and not in the repository.
        return repository.find(sku).map(level -> level - reserved.getOrDefault(sku, 0));
    }

    public void reserve(String sku, int quantity) {
        // TODO: remove this synchronized wrapper once #3 is fixed
        synchronized (reserved) {
            reserved.merge(sku, quantity, Integer::sum);
        }
    }

    public void release(String sku, int quantity) {
        String key = sku.trim(); // HACK: trim until #5 is resolved, the importer pads SKUs with spaces
        reserved.computeIfPresent(key, (k, v) -> v - quantity <= 0 ? null : v - quantity);
    }
}
