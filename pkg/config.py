"""
Configuraciones de la aplicación
"""


class AppConfig:
    """Configuraciones generales del propagador"""

    # Configuración del integrador de soluciones fundamentales
    DEFAULT_N_STEPS = 1024
    MIN_N_STEPS = 8
    CAUSTIC_TOL_FACTOR = 1e-10  # Multiplica a (t_b - t_a)
    NEAR_CAUSTIC_FACTOR = 1e3  # Aviso cuando |denominador| < factor * caustic_tol
    WRONSKIAN_TOL = 1e-8
    DOMAIN_SLACK = 1e-12  # Holgura relativa al comprobar t en [t_a, t_b]

    # Configuración del flujo en el acoplamiento g
    GFLOW_DELTA = 1e-4

    # Configuración de la fórmula de difuminado
    GAUSS_HERMITE_ORDER = 40
    MAX_QUADRATURE_AXES = 3
    MAX_MOMENT_ORDER = 8
    MAX_POLYNOMIAL_DEGREE = 16
    BLOCK_CONDITION_LIMIT = 1e12
    DETERMINANT_CROSSCHECK_TOL = 1e-10

    # Configuración del oráculo de red
    LATTICE_PIVOT_TOL = 1e-12
    MIN_LATTICE_NODES = 2

    # Configuración de la integral de traza regularizada
    TRACE_EPSILON = 1e-4
    TRACE_HALF_WIDTH = 700.0
    TRACE_STEP = 1e-3

    # Configuración de salida
    CSV_HEADER_GREENS = ("t", "t2", "value")
    CSV_HEADER_FUNDAMENTAL = ("t", "Da", "Da_dot", "Db", "Db_dot")
    JSON_INDENT = 2
    DEFAULT_GRID_POINTS = 11

    # Códigos de salida
    EXIT_OK = 0
    EXIT_CONFIG_ERROR = 2
    EXIT_COMPUTATION_ERROR = 3

    # Mensajes
    SUCCESS_MESSAGE = "✅ Resultado escrito en"
    CONFIG_ERROR_MESSAGE = "❌ config_error:"
    COMPUTATION_ERROR_MESSAGE = "❌"
    VALIDATION_PASSED_MESSAGE = "✅ Todas las comprobaciones superadas"
    VALIDATION_FAILED_MESSAGE = "❌ Comprobaciones fallidas:"
