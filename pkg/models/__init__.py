"""Configuration and report records used across the experiment harness."""
