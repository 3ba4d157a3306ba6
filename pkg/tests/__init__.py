"""Test suite for AtomFrame"""
