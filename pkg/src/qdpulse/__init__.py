"""qdpulse - pulsed charge-injection entanglement simulator for coupled charge qubits"""

__version__ = "0.1.0"
