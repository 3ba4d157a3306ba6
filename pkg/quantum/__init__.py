"""Operators, quantization, Hamiltonians and time evolution of the atom-field system"""
