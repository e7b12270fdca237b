"""Ride-comfort / eco-driving telemetry analysis and SOM-based driving advice."""

__version__ = "0.1.0"
