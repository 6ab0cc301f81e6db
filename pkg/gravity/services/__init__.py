"""
Gravity Services

Domänenlogik der Anwendung, aufgeteilt nach Aufgabenbereich. Details siehe README.md.
"""
