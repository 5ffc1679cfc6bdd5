"""Tests for the {{ folder_name }} workspace."""
