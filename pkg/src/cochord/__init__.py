"""Coisotropic capacities of convex bodies."""
