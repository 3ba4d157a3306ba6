"""Minkowski kinematics, Wigner tetrads and the external Poincare realization"""
