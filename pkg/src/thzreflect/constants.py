"""Shared physical constants."""

# Textbook speed of light. The classic reflectarray geometry numbers
# (150 um half-wavelength pitch at 1 THz, 12.75 mm panel for an 85 x 85
# grid) come out exact with this value, so the whole toolkit uses it.
SPEED_OF_LIGHT = 3.0e8  # m/s
