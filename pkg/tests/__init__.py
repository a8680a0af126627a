"""Test suite for rough-clt."""
