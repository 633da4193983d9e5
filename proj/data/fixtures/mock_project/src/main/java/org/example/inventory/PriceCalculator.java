package org.example.inventory;

import java.math.BigDecimal;
import java.math.RoundingMode;

public class PriceCalculator {

    private static final BigDecimal TAX = new BigDecimal("0.19");

    public BigDecimal gross(BigDecimal net) {
        /* TODO: drop the explicit rounding after #3 is fixed; the scale is lost on concurrent updates */
        return net.add(net.multiply(TAX)).setScale(2, RoundingMode.HALF_UP);
    }

    public BigDecimal discount(BigDecimal price, int percent) {
        if (percent < 0 || percent > 100) {
            throw new IllegalArgumentException("percent out of range: " + percent);
        }
        return price.multiply(BigDecimal.valueOf(100 - percent)).divide(BigDecimal.valueOf(100), RoundingMode.HALF_UP);
    }
}
