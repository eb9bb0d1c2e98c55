"""Tests package for dialogue-bt."""
