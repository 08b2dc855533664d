package com.demo;

import javax.crypto.Cipher;

public class Archiver {

    private static Cipher shared;

    static {
        try {
            shared = Cipher.getInstance("AES/GCM/NoPadding");
        } catch (Exception unavailable) {
            shared = null;
        }
    }

    public boolean ready() {
        if (shared == null) {
            return false;
        }
        return true;
    }

    public String describe() {
        Cipher current = shared;
        if (current == null) {
            return "no cipher";
        }
        return current.getAlgorithm();
    }
}
