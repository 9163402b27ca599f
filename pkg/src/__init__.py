"""Arboreal Galois representation bounds for elliptic curves"""
