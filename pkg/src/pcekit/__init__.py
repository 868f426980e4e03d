"""pcekit: player-compatible equilibrium toolkit for finite games.

Subpackages and modules:

- ``pcekit.numerics``: exact rational LP / linear algebra and the special
  functions used by the Bayesian bandit indices.
- ``pcekit.games``: strategic-form games, mixed/correlated profiles,
  signaling games.
- ``pcekit.compat``: the player-compatibility relation and digraph, plus
  the signaling-game compatibility criterion.
- ``pcekit.trembles``: tremble profiles, constrained equilibria, PCE
  candidate traces, and the necessary-condition refuter.
- ``pcekit.extensive``: extensive forms, factorability analysis and the
  strategic-form reduction.
- ``pcekit.learning``: Dirichlet-belief bandit agents (truncated Gittins
  and Bayes-UCB), induced responses and coupled comparisons.
- ``pcekit.gamefile``: JSON game-file codec plus the packaged fixtures.
- ``pcekit.reproduce``: scripted reruns of the headline analyses with
  structured pass/fail reporting.
- ``pcekit.cli``: the ``pce`` command line surface.
"""

__version__ = "0.1.0"
