"""Published reference values for the airbag and hanging-blanket problems.

Displacements in m, stresses in Pa.  Keys of the airbag mesh study are the
element counts per side of the quarter model.
"""

AIRBAG_MESH_STUDY = {  # quadratic elements, no residual compressive stiffness
    2: dict(uz_M=0.2234, uy_A=0.0396, uy_B=0.1077, sigma1_M=13.91e6),
    4: dict(uz_M=0.2175, uy_A=0.0378, uy_B=0.1168, sigma1_M=3.95e6),
    8: dict(uz_M=0.2172, uy_A=0.0368, uy_B=0.1228, sigma1_M=4.27e6),
    16: dict(uz_M=0.2170, uy_A=0.0358, uy_B=0.1289, sigma1_M=3.90e6),
    32: dict(uz_M=0.2174, uy_A=0.0352, uy_B=0.1346, sigma1_M=3.80e6),
}

AIRBAG_ETA_1E4 = {  # degree -> values with eta = 1e-4
    1: dict(uz_M=0.2165, uy_A=0.0362, uy_B=0.1210, sigma1_M=3.9e6),
    2: dict(uz_M=0.2164, uy_A=0.0351, uy_B=0.1212, sigma1_M=3.9e6),
}

AIRBAG_LITERATURE = {
    "Contri and Schrefler": dict(uz_M=0.217, uy_A=0.045, uy_B=0.110, sigma1_M=3.5e6),
    "Kang and Im": dict(uz_M=0.214, uy_A=0.041, uy_B=0.119),
    "Diaby et al.": dict(uz_M=0.2245, uy_A=0.0307, uy_B=0.1158),
    "Jarasjarungkiat et al.": dict(uz_M=0.2175, uy_A=0.0349, uy_B=0.1203, sigma1_M=3.9e6),
}

# 25x25 quadratic mesh; the stress column is given without a usable unit
BLANKET = {
    0.0: dict(uz_M=-0.28949, ux_A=-0.03661, ux_B=-0.01830, sigma1_M=611.68),
    0.3: dict(uz_M=-0.29531, ux_A=-0.03278, ux_B=-0.01639, sigma1_M=586.99),
}

BLANKET_MIXED_CRITERION = {
    0.0: dict(uz_M=-0.28949, ux_A=-0.03661, ux_B=-0.01830, sigma1_M=637.68),
    0.3: dict(uz_M=-0.28328, ux_A=-0.03406, ux_B=-0.01703, sigma1_M=642.66),
}
