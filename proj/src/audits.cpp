namespace ostab {}
