"""
cspline Test Suite
"""
