"""Sub-project one of the {{ folder_name }} workspace."""
