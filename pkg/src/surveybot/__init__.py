"""Multilingual questionnaire chatbot: engine, scoring, gateway, analytics."""

__version__ = "0.1.0"
