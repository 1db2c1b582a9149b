"""
Test package for the Atkin-Lehner quotient classifier
"""
