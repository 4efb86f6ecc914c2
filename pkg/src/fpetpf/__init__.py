"""Feature-preserving ensemble transform particle filter."""
