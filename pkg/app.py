"""
Casimir sphere-sphere calculator: command-line entry point.

Commands:
  compute      energy with PFA, diffractive and geometric parts
  sweep-delta  E_1 versus the material-angle difference for several radius ratios
  sweep-x      resummed diffractive energy of perfect conductors versus L/R_eff
  ntlo         x^{3/2} coefficient of the resummed energy
  mie-check    WKB amplitude against the PEC Mie sum
  oracle       brute-force and closed-form consistency suites

Run:
    python app.py compute --R1 50e-6 --R2 inf --L 1e-6 --theta2 0.3
"""

import env_config  # noqa: F401  (loads .env before settings are read)
from casimir.cli import cli

if __name__ == "__main__":
    cli()
