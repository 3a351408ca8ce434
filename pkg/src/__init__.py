"""
SigBoost LSS
Boosting por componentes para regresión de señales en modelos de localización, escala y forma
"""

__version__ = '1.0.0'
