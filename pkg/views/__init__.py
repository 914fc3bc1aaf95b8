"""
Vistas: escritura de resultados y mensajes de consola
"""
