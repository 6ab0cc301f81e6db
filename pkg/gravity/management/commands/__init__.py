# Diese Datei bleibt leer.
# Sie signalisiert Python, dass 'commands' ein Paket ist.
