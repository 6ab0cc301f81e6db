"""Django-Projektpaket: Settings und URL-Konfiguration."""
