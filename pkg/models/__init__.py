"""
Modelos del oscilador armónico con frecuencia dependiente del tiempo
"""
