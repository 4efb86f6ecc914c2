"""Twin-experiment harness: problems, observations, assimilation loop, outputs, CLI."""
