"""Figure scripts for plan-ensemble plot-data files.

Each module renders one figure kind from one delimited plot-data table:
density overlays of a metric across chains, the cut-edge histogram, sorted
vote-share violins, and metric-vs-LRVS scatters with marginal densities.
The scripts read only the plot-data files; they never touch the engine.
"""

__version__ = "0.1.0"
