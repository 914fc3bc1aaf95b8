# Utilidades: esquema de configuración y cuadraturas sobre la malla
