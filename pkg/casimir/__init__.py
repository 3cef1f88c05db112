"""Casimir interaction between spheres in the plane-wave scattering formalism."""
