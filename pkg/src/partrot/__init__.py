"""Partial-Trotterization compiler for Pauli-sum Hamiltonians."""
