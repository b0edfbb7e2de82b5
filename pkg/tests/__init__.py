"""
Test suite for the UMDQN lab
"""
