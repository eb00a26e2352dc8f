# Intervalos de Predição - conformal, bootstrap e paramétrico
__version__ = "1.0.0"
