package org.example.inventory;

import static org.junit.jupiter.api.Assertions.assertEquals;
import static org.mockito.Mockito.mock;
import static org.mockito.Mockito.when;

import java.util.Optional;
import org.junit.jupiter.api.Test;

class InventoryServiceTest {

    @Test
    void availableSubtractsReservations() {
        StockRepository repository = mock(StockRepository.class);
        // TODO: Use this for now then modify this once https://github.com/mockito/mockito/issues/769 is fixed
        when(repository.find("A-1")).thenReturn(Optional.of(5));
        InventoryService service = new InventoryService(repository);
        service.reserve("A-1", 2);
        assertEquals(Optional.of(3), service.available("A-1"));
    }
}
