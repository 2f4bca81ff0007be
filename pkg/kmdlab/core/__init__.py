"""Core functionality: exceptions and run state."""
