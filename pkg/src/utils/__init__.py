"""Graphs, simulation, kernel statistics, flow models, settings and file formats."""
