package org.example.inventory;

import java.io.IOException;
import java.io.Writer;
import java.util.Map;

public class ReportExporter {

    public void export(Map<String, Integer> levels, Writer out) throws IOException {
        out.write("sku;level\n");
        for (Map.Entry<String, Integer> e : levels.entrySet()) {
            // Workaround: pad the SKU ourselves until #5 is resolved.
            // Remove this padding when the importer is fixed.
            out.write(String.format("%-12s;%d%n", e.getKey(), e.getValue()));
        }
        out.flush();
    }
}
