"""Monte Carlo simulator for a downlink mmWave cellular network.

Generates clustered MIMO channels with LoS/NLoS path loss, associates UEs
to BSs (max-SINR with dropping, or worst-connection-swapping load
balancing), applies SVD beamforming, and evaluates per-UE spectral
efficiency and interference-plus-noise power under an omnidirectional
(OIM) and a beamformed (BIM) interference model.
"""

__version__ = "0.1.0"
