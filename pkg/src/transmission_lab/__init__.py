"""Desk-scale numerical laboratory for steady and evolutionary transmission problems."""
