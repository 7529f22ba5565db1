"""Numeric core: kernels, designs, moments, zero-crossing formulas and simulation."""
