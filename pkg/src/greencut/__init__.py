"""Decay of a discrete level into a continuum band: self-energies, poles and survival amplitudes."""
