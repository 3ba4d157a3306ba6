"""Grassmann algebra, graded Poisson brackets and Dirac brackets"""
