"""Exact tight-spans of metrics, directed distances and diversities."""
