"""Numerical core: algebra, four-dot model, dynamics, metrics and configuration"""
