"""Test suite for prg_verify."""
