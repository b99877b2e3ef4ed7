"""
ANP-Lab: Adversarial Noise Propagation training laboratory

A desk-scale toolkit for training small networks with layer-wise adversarial
noise and measuring their adversarial, corruption and structural robustness.
"""

__version__ = "0.1.0"
__author__ = "ANP-Lab Team"
