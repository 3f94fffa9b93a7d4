"""
Test suite for qrmax.
"""
