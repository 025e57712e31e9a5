"""
ocrprep: training OCR preprocessors through an unknown-box recognizer
"""

__version__ = "0.1.0"
