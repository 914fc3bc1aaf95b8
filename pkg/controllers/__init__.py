"""
Controladores: despacho de subcomandos y batería de comprobaciones
"""
