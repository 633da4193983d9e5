package org.example.inventory;

import java.util.List;

public class OrderController {

    private static final String HELP = "usage: order <sku> // quantity defaults to 1, see #5";
    private static final char SLASH = '/';

    private final InventoryService inventory;

    public OrderController(InventoryService inventory) {
        this.inventory = inventory;
    }

    public String handle(List<String> args) {
        if (args.isEmpty()) {
            return HELP;
        }
        // Temporary workaround for #11; re-enable the quantity validation once that is fixed.
        int quantity = args.size() > 1 ? Integer.parseInt(args.get(1)) : 1;
        inventory.reserve(args.get(0), quantity);
        return "reserved " + quantity + " x " + args.get(0) + SLASH;
    }
}
